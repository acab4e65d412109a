//! Call-path merging: grouping TSI applications whose runs can share
//! deployed test configurations.
//!
//! A path can merge into a group when it is a sub-path (or super-path) of the
//! group's max-path and the coverage comparison allows it. A full merge
//! covers all runs of the weaker side; a partial merge leaves residual runs
//! that a dedicated residual grouping picks up later.
//!
//! Strength and width comparisons are non-strict: the worked examples group
//! items that share the same criterion and width, which a strict reading
//! would forbid.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::ids::AppId;
use crate::model::{CoverageCriterion, TsiApplication};
use crate::path::CallPath;

/// A set of TSI applications merged so their runs share deployments of the
/// head's configurations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grouping {
    /// The application whose call path and coverage define the group.
    pub head: AppId,
    pub members: BTreeSet<AppId>,
    /// Always the head's call path.
    pub max_path: CallPath,
    pub head_coverage: CoverageCriterion,
    /// True for groups created to hold runs a partial merge could not cover.
    pub residual: bool,
}

/// True iff `c1` is at most as strong as `c2` under the total order
/// all-mixtures < pairwise < all-paths.
pub fn coverage_weaker_or_equal(c1: CoverageCriterion, c2: CoverageCriterion) -> bool {
    c1.kind.strength() <= c2.kind.strength()
}

fn width_le(c1: CoverageCriterion, c2: CoverageCriterion) -> bool {
    c1.width <= c2.width
}

struct MergeState<'a> {
    by_id: BTreeMap<&'a AppId, &'a TsiApplication>,
    groups: BTreeMap<AppId, Grouping>,
}

impl<'a> MergeState<'a> {
    fn app(&self, id: &AppId) -> &'a TsiApplication {
        self.by_id[id]
    }

    fn head_ids(&self) -> Vec<AppId> {
        self.groups.keys().cloned().collect()
    }

    fn fresh_group(&mut self, app: &TsiApplication, residual: bool) {
        self.groups.insert(
            app.id.clone(),
            Grouping {
                head: app.id.clone(),
                members: [app.id.clone()].into_iter().collect(),
                max_path: app.path.clone(),
                head_coverage: app.coverage,
                residual,
            },
        );
    }

    /// Pull into the group headed by `new_head` every other group whose head
    /// path is a sub-path of the new head's and whose coverage is weaker or
    /// equal with smaller or equal width; those groups are absorbed.
    fn adjust_grouping_full(&mut self, new_head: &AppId) {
        let new_app = self.app(new_head);
        let mut absorbed: Vec<AppId> = Vec::new();
        for head in self.head_ids() {
            if &head == new_head {
                continue;
            }
            let other = self.app(&head);
            if other.path.is_sub_path_of(&new_app.path)
                && coverage_weaker_or_equal(other.coverage, new_app.coverage)
                && width_le(other.coverage, new_app.coverage)
            {
                absorbed.push(head);
            }
        }
        for head in absorbed {
            let old = self.groups.remove(&head).expect("group key present");
            self.groups
                .get_mut(new_head)
                .expect("new head group present")
                .members
                .extend(old.members);
        }
    }

    /// Copy into the group headed by `new_head` the members of every other
    /// group whose head path is a sub-path with strictly stronger coverage of
    /// smaller or equal width; those groups stay to host their residual runs.
    fn adjust_grouping_partial(&mut self, new_head: &AppId) {
        let new_app = self.app(new_head);
        let mut copied: Vec<BTreeSet<AppId>> = Vec::new();
        for head in self.head_ids() {
            if &head == new_head {
                continue;
            }
            let other = self.app(&head);
            if other.path.is_sub_path_of(&new_app.path)
                && !coverage_weaker_or_equal(other.coverage, new_app.coverage)
                && width_le(other.coverage, new_app.coverage)
            {
                copied.push(self.groups[&head].members.clone());
            }
        }
        let group = self.groups.get_mut(new_head).expect("new head group present");
        for members in copied {
            group.members.extend(members);
        }
    }
}

/// Groups the suite's applications. Applications are processed in canonical
/// id order and existing groups are visited in canonical head order, so the
/// output is deterministic for a fixed suite.
///
/// Every application lands in at least one group.
pub fn merge_call_paths(suite: &[TsiApplication]) -> Vec<Grouping> {
    let mut ordered: Vec<&TsiApplication> = suite.iter().collect();
    ordered.sort_by(|a, b| a.id.cmp(&b.id));

    let mut state = MergeState {
        by_id: ordered.iter().map(|a| (&a.id, *a)).collect(),
        groups: BTreeMap::new(),
    };

    for current in &ordered {
        if state.groups.is_empty() {
            state.fresh_group(current, false);
            continue;
        }

        // Full merges first: join an existing group as a plain member, or
        // take over as its new head.
        let mut merged = false;
        for head in state.head_ids() {
            let head_app = state.app(&head);

            // Single-vertex paths merge on the width check alone: with one
            // factor every criterion mandates the same mixture list.
            if current.path.len() == 1
                && current.path.is_sub_path_of(&head_app.path)
                && width_le(current.coverage, head_app.coverage)
            {
                state
                    .groups
                    .get_mut(&head)
                    .expect("group present")
                    .members
                    .insert(current.id.clone());
                merged = true;
                break;
            }

            if current.path.is_sub_path_of(&head_app.path)
                && coverage_weaker_or_equal(current.coverage, head_app.coverage)
                && width_le(current.coverage, head_app.coverage)
            {
                state
                    .groups
                    .get_mut(&head)
                    .expect("group present")
                    .members
                    .insert(current.id.clone());
                merged = true;
                break;
            }

            if head_app.path.is_sub_path_of(&current.path)
                && coverage_weaker_or_equal(head_app.coverage, current.coverage)
                && width_le(head_app.coverage, current.coverage)
            {
                // The newcomer sets a new max-path; the old group dissolves
                // into it, then other groups get a chance to merge too.
                let old = state.groups.remove(&head).expect("group present");
                let mut members = old.members;
                members.insert(current.id.clone());
                state.groups.insert(
                    current.id.clone(),
                    Grouping {
                        head: current.id.clone(),
                        members,
                        max_path: current.path.clone(),
                        head_coverage: current.coverage,
                        residual: false,
                    },
                );
                state.adjust_grouping_full(&current.id);
                state.adjust_grouping_partial(&current.id);
                merged = true;
                break;
            }
        }
        if merged {
            continue;
        }

        // Partial merges: distribute the runs over every group with a
        // super-path max-path, or take over a group whose head is a strictly
        // stronger sub-path (keeping the old group for its residual runs).
        let mut distributed = false;
        for head in state.head_ids() {
            let head_app = state.app(&head);

            if current.path.is_sub_path_of(&head_app.path)
                && !coverage_weaker_or_equal(current.coverage, head_app.coverage)
                && width_le(current.coverage, head_app.coverage)
            {
                state
                    .groups
                    .get_mut(&head)
                    .expect("group present")
                    .members
                    .insert(current.id.clone());
                distributed = true;
                continue;
            }

            if head_app.path.is_sub_path_of(&current.path)
                && !coverage_weaker_or_equal(head_app.coverage, current.coverage)
                && width_le(head_app.coverage, current.coverage)
            {
                let mut members = state.groups[&head].members.clone();
                members.insert(current.id.clone());
                state.groups.insert(
                    current.id.clone(),
                    Grouping {
                        head: current.id.clone(),
                        members,
                        max_path: current.path.clone(),
                        head_coverage: current.coverage,
                        residual: false,
                    },
                );
                state.adjust_grouping_partial(&current.id);
                merged = true;
                break;
            }
        }
        if merged {
            continue;
        }

        // A distributed application still needs a home for the runs its
        // hosting groups cannot cover; anything untouched starts fresh.
        state.fresh_group(current, distributed);
    }

    state.groups.into_values().collect()
}
