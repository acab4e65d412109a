//! Ordering of test runs: precedence enforcement first, then configuration
//! similarity ordering to keep relocations down.
//!
//! Precedence uses three operators: reordering invocations inside a test
//! case, sequencing following-only cases after the cases their leading TSI
//! runs in, and ordering whole case blocks (groupings stay contiguous, so a
//! cross-grouping pair turns into a grouping-order constraint).
//!
//! Configuration ordering is greedy nearest-neighbor on the similarity
//! distance, except for the one case with a provably optimal order: full
//! product coverage over all-rolling CIs follows a mixed-radix reflected
//! Gray sequence, where consecutive configurations differ in exactly one
//! CI's mixture and more critical CIs change less often.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use crate::coverage::{Mixture, TestConfiguration};
use crate::ids::{AppId, CiId, TsiId};
use crate::merging::Grouping;
use crate::methods::{grouping_timing, small_flip_feasible, Method, MethodAssignment};
use crate::model::{CoverageKind, Model, PrecedencePair};
use crate::runs::{CaseDraft, CaseLayout};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrderingError {
    /// Similarity is only defined between configurations of the same path.
    DifferentPaths,
    /// No schedule can satisfy this pair given the configurations.
    UnsatisfiablePrecedence { leading: TsiId, following: TsiId },
}

impl fmt::Display for OrderingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderingError::DifferentPaths => {
                write!(f, "similarity requires configurations over the same call path")
            }
            OrderingError::UnsatisfiablePrecedence { leading, following } => write!(
                f,
                "precedence pair ({leading}, {following}) cannot be satisfied by any schedule"
            ),
        }
    }
}

impl core::error::Error for OrderingError {}

/// A small-flip choice revoked during precedence enforcement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MethodDowngrade {
    pub grouping: AppId,
    pub ci: CiId,
}

/// The schedule in the making: groupings in execution order, each with its
/// ordered case list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderedPlanDraft {
    pub grouping_order: Vec<AppId>,
    pub cases: BTreeMap<AppId, Vec<CaseDraft>>,
    /// Pairs already enforced; every later move re-checks them.
    maintained: Vec<PrecedencePair>,
    /// Cross-grouping ordering constraints (earlier, later) with the pair
    /// that caused them.
    grouping_constraints: Vec<(AppId, AppId, PrecedencePair)>,
}

impl OrderedPlanDraft {
    pub fn from_layout(layout: &CaseLayout) -> Self {
        let mut cases: BTreeMap<AppId, Vec<CaseDraft>> = BTreeMap::new();
        for case in &layout.cases {
            cases
                .entry(case.grouping.clone())
                .or_default()
                .push(case.clone());
        }
        let grouping_order = cases.keys().cloned().collect();
        Self {
            grouping_order,
            cases,
            maintained: Vec::new(),
            grouping_constraints: Vec::new(),
        }
    }

    /// Cases in final schedule order.
    pub fn schedule(&self) -> Vec<&CaseDraft> {
        self.grouping_order
            .iter()
            .flat_map(|g| self.cases.get(g).into_iter().flatten())
            .collect()
    }

    pub fn run_count(&self) -> usize {
        self.cases
            .values()
            .flat_map(|cs| cs.iter())
            .map(|c| c.invocations.len())
            .sum()
    }
}

/// Count of CIs to which the two configurations assign different mixtures.
/// Zero iff the assignments are identical; symmetric by construction.
pub fn similarity(c1: &TestConfiguration, c2: &TestConfiguration) -> Result<usize, OrderingError> {
    if c1.path != c2.path {
        return Err(OrderingError::DifferentPaths);
    }
    Ok(masked_distance(&c1.assignment, &c2.assignment, None))
}

/// Similarity distance restricted to the CIs whose mixture change implies a
/// relocation. `mask = None` counts every CI.
pub fn masked_distance(
    a: &BTreeMap<CiId, Mixture>,
    b: &BTreeMap<CiId, Mixture>,
    mask: Option<&BTreeSet<CiId>>,
) -> usize {
    let keys: BTreeSet<&CiId> = a.keys().chain(b.keys()).collect();
    keys.into_iter()
        .filter(|ci| mask.is_none_or(|m| m.contains(*ci)))
        .filter(|ci| a.get(*ci) != b.get(*ci))
        .count()
}

fn apps_of_tsi<'a>(case: &'a CaseDraft, tsi: &TsiId) -> impl Iterator<Item = &'a AppId> + 'a {
    let tsi = tsi.clone();
    case.invocations.iter().filter(move |a| a.tsi == tsi)
}

fn invokes(case: &CaseDraft, tsi: &TsiId) -> bool {
    apps_of_tsi(case, tsi).next().is_some()
}

/// Within one case: every invocation of `leading` must come before every
/// invocation of `following`.
fn case_orders_pair(case: &CaseDraft, pair: &PrecedencePair) -> bool {
    let last_leading = case
        .invocations
        .iter()
        .rposition(|a| a.tsi == pair.leading);
    let first_following = case
        .invocations
        .iter()
        .position(|a| a.tsi == pair.following);
    match (last_leading, first_following) {
        (Some(l), Some(f)) => l < f,
        _ => true,
    }
}

/// Moves the following invocations right after the last leading invocation,
/// preserving the relative order of everything else.
fn reorder_case_invocations(case: &mut CaseDraft, pair: &PrecedencePair) {
    if case_orders_pair(case, pair) {
        return;
    }
    let following: Vec<AppId> = case
        .invocations
        .iter()
        .filter(|a| a.tsi == pair.following)
        .cloned()
        .collect();
    case.invocations.retain(|a| a.tsi != pair.following);
    let anchor = case
        .invocations
        .iter()
        .rposition(|a| a.tsi == pair.leading)
        .map(|i| i + 1)
        .unwrap_or(case.invocations.len());
    for (offset, app) in following.into_iter().enumerate() {
        case.invocations.insert(anchor + offset, app);
    }
}

/// Moves the following-only cases of one grouping after its last case that
/// invokes the leading TSI, keeping relative orders stable.
fn reorder_grouping_cases(cases: &mut Vec<CaseDraft>, pair: &PrecedencePair) {
    let is_following_only = |c: &CaseDraft| invokes(c, &pair.following) && !invokes(c, &pair.leading);
    let last_leading = cases.iter().rposition(|c| invokes(c, &pair.leading));
    let Some(last_leading) = last_leading else {
        return;
    };
    let violated = cases
        .iter()
        .take(last_leading)
        .any(&is_following_only);
    if !violated {
        return;
    }
    let mut moved: Vec<CaseDraft> = Vec::new();
    let mut kept: Vec<CaseDraft> = Vec::new();
    for case in cases.drain(..) {
        if is_following_only(&case) {
            moved.push(case);
        } else {
            kept.push(case);
        }
    }
    let anchor = kept
        .iter()
        .rposition(|c| invokes(c, &pair.leading))
        .map(|i| i + 1)
        .unwrap_or(kept.len());
    for (offset, case) in moved.into_iter().enumerate() {
        kept.insert(anchor + offset, case);
    }
    *cases = kept;
}

/// Topological ranks of the TSIs under the precedence relation; followers
/// rank strictly above their leaders. Errors name the first pair on a cycle.
fn precedence_ranks(
    pairs: &[PrecedencePair],
) -> Result<BTreeMap<TsiId, usize>, OrderingError> {
    let mut nodes: BTreeSet<TsiId> = BTreeSet::new();
    for p in pairs {
        nodes.insert(p.leading.clone());
        nodes.insert(p.following.clone());
    }
    let mut rank: BTreeMap<TsiId, usize> = BTreeMap::new();
    let mut remaining: BTreeSet<TsiId> = nodes.clone();
    let mut level = 0usize;
    while !remaining.is_empty() {
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
            let pair = pairs
                .iter()
                .find(|p| remaining.contains(&p.leading) && remaining.contains(&p.following))
                .expect("cycle implies a stuck pair");
            return Err(OrderingError::UnsatisfiablePrecedence {
                leading: pair.leading.clone(),
                following: pair.following.clone(),
            });
        }
        for t in ready {
            remaining.remove(&t);
            rank.insert(t, level);
        }
        level += 1;
    }
    Ok(rank)
}

fn pair_violated(draft: &OrderedPlanDraft, pair: &PrecedencePair) -> bool {
    let schedule = draft.schedule();
    for case in &schedule {
        if !case_orders_pair(case, pair) {
            return true;
        }
    }
    let last_leading = schedule.iter().rposition(|c| invokes(c, &pair.leading));
    let Some(last_leading) = last_leading else {
        return false;
    };
    schedule
        .iter()
        .take(last_leading)
        .any(|c| invokes(c, &pair.following) && !invokes(c, &pair.leading))
}

/// Enforces every precedence pair on the draft.
///
/// Pairs are handled in topological order of the following TSI, so a later
/// move never breaks an earlier pair; the maintained set is still re-scanned
/// after every pair as a guard. A pair spanning two groupings orders the
/// groupings themselves (cases of different groupings never interleave).
///
/// If a move invalidates the small-flip feasibility of a CI, its method is
/// downgraded to rolling paths; the downgrades are returned.
pub fn enforce_precedence(
    draft: &mut OrderedPlanDraft,
    pairs: &[PrecedencePair],
    model: &Model,
    layout: &CaseLayout,
    assignment: &mut MethodAssignment,
) -> Result<Vec<MethodDowngrade>, OrderingError> {
    let ranks = precedence_ranks(pairs)?;
    let mut ordered: Vec<&PrecedencePair> = pairs.iter().collect();
    ordered.sort_by_key(|p| (ranks[&p.following], ranks[&p.leading], (*p).clone()));

    for pair in ordered {
        handle_pair(draft, pair)?;
        draft.maintained.push(pair.clone());
        // Full re-scan of everything handled so far.
        let mut guard = 0usize;
        loop {
            let broken: Vec<PrecedencePair> = draft
                .maintained
                .clone()
                .into_iter()
                .filter(|p| pair_violated(draft, p))
                .collect();
            if broken.is_empty() {
                break;
            }
            guard += 1;
            if guard > 4 * (pairs.len() + 1) * (pairs.len() + 1) {
                let p = &broken[0];
                return Err(OrderingError::UnsatisfiablePrecedence {
                    leading: p.leading.clone(),
                    following: p.following.clone(),
                });
            }
            for p in broken {
                handle_pair(draft, &p)?;
            }
        }
    }

    Ok(reverify_small_flips(draft, model, layout, assignment))
}

fn handle_pair(draft: &mut OrderedPlanDraft, pair: &PrecedencePair) -> Result<(), OrderingError> {
    // Rule 1: order invocations inside every case running both TSIs.
    for cases in draft.cases.values_mut() {
        for case in cases.iter_mut() {
            if invokes(case, &pair.leading) && invokes(case, &pair.following) {
                reorder_case_invocations(case, pair);
            }
        }
    }

    // Rules 2 and 3: following-only cases go after the leading cases, inside
    // each grouping and across groupings.
    let groupings_with_leading: BTreeSet<AppId> = draft
        .cases
        .iter()
        .filter(|(_, cs)| cs.iter().any(|c| invokes(c, &pair.leading)))
        .map(|(g, _)| g.clone())
        .collect();
    let groupings_with_following_only: BTreeSet<AppId> = draft
        .cases
        .iter()
        .filter(|(_, cs)| {
            cs.iter()
                .any(|c| invokes(c, &pair.following) && !invokes(c, &pair.leading))
        })
        .map(|(g, _)| g.clone())
        .collect();

    for (grouping, cases) in draft.cases.iter_mut() {
        if groupings_with_leading.contains(grouping) {
            reorder_grouping_cases(cases, pair);
        }
    }

    for later in &groupings_with_following_only {
        for earlier in &groupings_with_leading {
            if earlier != later {
                let constraint = (earlier.clone(), later.clone(), pair.clone());
                if !draft.grouping_constraints.contains(&constraint) {
                    draft.grouping_constraints.push(constraint);
                }
            }
        }
    }

    resort_groupings(draft)
}

/// Topologically re-sorts the grouping order under the accumulated
/// constraints, canonical order as tie-break.
fn resort_groupings(draft: &mut OrderedPlanDraft) -> Result<(), OrderingError> {
    let mut remaining: BTreeSet<AppId> = draft.grouping_order.iter().cloned().collect();
    let mut order: Vec<AppId> = Vec::with_capacity(remaining.len());
    while !remaining.is_empty() {
        let next = remaining
            .iter()
            .find(|g| {
                !draft
                    .grouping_constraints
                    .iter()
                    .any(|(earlier, later, _)| later == *g && remaining.contains(earlier))
            })
            .cloned();
        match next {
            Some(g) => {
                remaining.remove(&g);
                order.push(g);
            }
            None => {
                let (_, _, pair) = draft
                    .grouping_constraints
                    .iter()
                    .find(|(e, l, _)| remaining.contains(e) && remaining.contains(l))
                    .expect("cycle implies a stuck constraint");
                return Err(OrderingError::UnsatisfiablePrecedence {
                    leading: pair.leading.clone(),
                    following: pair.following.clone(),
                });
            }
        }
    }
    draft.grouping_order = order;
    Ok(())
}

/// Re-checks the small-flip feasibility of every small-flip CI against the
/// grouping's current timing and downgrades violations to rolling paths.
fn reverify_small_flips(
    draft: &OrderedPlanDraft,
    model: &Model,
    layout: &CaseLayout,
    assignment: &mut MethodAssignment,
) -> Vec<MethodDowngrade> {
    let mut downgrades = Vec::new();
    for grouping in &layout.groupings {
        let Some(methods) = assignment.per_grouping.get_mut(&grouping.head) else {
            continue;
        };
        let Some(cases) = draft.cases.get(&grouping.head) else {
            continue;
        };
        // Timing from the draft's current case contents.
        let mut shadow = layout.clone();
        shadow.cases = cases.clone();
        let chosen = methods.clone();
        let timing = grouping_timing(model, &shadow, grouping, &chosen);
        for (ci, method) in methods.iter_mut() {
            if *method != Method::SmallFlip {
                continue;
            }
            let Some(inst) = model.cis().get(ci) else {
                continue;
            };
            let envs: Vec<_> = model
                .system
                .environments_of(ci)
                .map(|e| (e.id.clone(), e.hosting_nodes.len()))
                .collect();
            if !small_flip_feasible(inst, &envs, grouping.head_coverage.width, timing) {
                *method = Method::RollingPaths;
                downgrades.push(MethodDowngrade {
                    grouping: grouping.head.clone(),
                    ci: ci.clone(),
                });
            }
        }
    }
    downgrades
}

/// Greedy similarity ordering: within each set of cases invoking the same
/// TSIs, the next case is the unvisited one closest to the current
/// configuration; ties prefer disturbing less critical CIs, then canonical
/// configuration order.
///
/// Only CIs tested with rolling paths count toward the distance: flips
/// relocate once regardless of the order and single step never does.
pub fn order_by_configuration(
    draft: &mut OrderedPlanDraft,
    model: &Model,
    layout: &CaseLayout,
    assignment: &MethodAssignment,
    seed: Option<u64>,
) {
    for grouping in &layout.groupings {
        let Some(cases) = draft.cases.get_mut(&grouping.head) else {
            continue;
        };
        if cases.len() < 2 {
            continue;
        }
        let rolling = assignment.rolling_cis(&grouping.head);

        if let Some(ordered) = gray_eligible_order(model, grouping, cases, &rolling) {
            *cases = ordered;
            continue;
        }

        greedy_order(cases, model, &rolling, seed);
    }
    // Partition-local reordering cannot break precedence, but scan anyway.
    debug_assert!(draft
        .maintained
        .clone()
        .iter()
        .all(|p| !pair_violated(draft, p)));
}

fn greedy_order(
    cases: &mut [CaseDraft],
    model: &Model,
    rolling: &BTreeSet<CiId>,
    seed: Option<u64>,
) {
    // Partition by invocation set; each partition is reordered within the
    // positions it already occupies.
    let mut partitions: BTreeMap<Vec<AppId>, Vec<usize>> = BTreeMap::new();
    for (idx, case) in cases.iter().enumerate() {
        partitions
            .entry(case.invocations.clone())
            .or_default()
            .push(idx);
    }

    let criticality = |ci: &CiId| model.cis().get(ci).map(|i| i.criticality).unwrap_or(0);

    for positions in partitions.values() {
        if positions.len() < 2 {
            continue;
        }
        let members: Vec<CaseDraft> = positions.iter().map(|i| cases[*i].clone()).collect();
        let start = match seed {
            // A keyed start for exploration; the default is the first case
            // in generation order.
            Some(s) => (s as usize) % members.len(),
            None => 0,
        };
        let mut unvisited: Vec<usize> = (0..members.len()).filter(|i| *i != start).collect();
        let mut sequence: Vec<usize> = alloc::vec![start];
        let mut current = start;
        while !unvisited.is_empty() {
            let mut best: Option<(usize, u32, &TestConfiguration, usize)> = None;
            for &candidate in &unvisited {
                let distance = masked_distance(
                    &members[current].config.assignment,
                    &members[candidate].config.assignment,
                    Some(rolling),
                );
                let max_crit = members[current]
                    .config
                    .assignment
                    .keys()
                    .filter(|ci| rolling.contains(*ci))
                    .filter(|ci| {
                        members[current].config.assignment.get(*ci)
                            != members[candidate].config.assignment.get(*ci)
                    })
                    .map(&criticality)
                    .max()
                    .unwrap_or(0);
                let key = (distance, max_crit, &members[candidate].config, candidate);
                let better = match &best {
                    None => true,
                    Some((d, c, cfg, _)) => {
                        (key.0, key.1, key.2) < (*d, *c, *cfg)
                    }
                };
                if better {
                    best = Some(key);
                }
            }
            let (_, _, _, next) = best.expect("unvisited not empty");
            unvisited.retain(|i| *i != next);
            sequence.push(next);
            current = next;
        }
        for (slot, member_idx) in positions.iter().zip(sequence) {
            cases[*slot] = members[member_idx].clone();
        }
    }
}

/// Mixed-radix reflected Gray sequence: every tuple of the product appears
/// exactly once and consecutive tuples differ in exactly one position.
/// Position 0 is the most significant digit (it changes the least).
pub fn gray_sequence(radices: &[usize]) -> Vec<Vec<usize>> {
    fn build(radices: &[usize]) -> Vec<Vec<usize>> {
        if radices.is_empty() {
            return alloc::vec![Vec::new()];
        }
        let sub = build(&radices[1..]);
        let mut out = Vec::with_capacity(radices.iter().product());
        for digit in 0..radices[0] {
            let forward = digit % 2 == 0;
            let iter: Vec<&Vec<usize>> = if forward {
                sub.iter().collect()
            } else {
                sub.iter().rev().collect()
            };
            for tail in iter {
                let mut row = Vec::with_capacity(radices.len());
                row.push(digit);
                row.extend(tail.iter().copied());
                out.push(row);
            }
        }
        out
    }
    build(radices)
}

/// Orders the full-product cases of a grouping along the Gray sequence, with
/// the most critical CI as the most significant digit. Applies only when
/// the coverage is the full product, every path CI rolls, and all cases
/// invoke the same TSIs; returns `None` otherwise.
fn gray_eligible_order(
    model: &Model,
    grouping: &Grouping,
    cases: &[CaseDraft],
    rolling: &BTreeSet<CiId>,
) -> Option<Vec<CaseDraft>> {
    if grouping.head_coverage.kind != CoverageKind::AllBeMixturesPaths {
        return None;
    }
    let path = grouping.max_path.vertices();
    if !path.iter().all(|ci| rolling.contains(ci)) {
        return None;
    }
    let first = &cases[0].invocations;
    if !cases.iter().all(|c| &c.invocations == first) {
        return None;
    }

    // Most critical CI first, id as tie-break; that is the digit order.
    let mut digit_cis: Vec<&CiId> = path.iter().collect();
    digit_cis.sort_by(|a, b| {
        let ca = model.cis().get(*a).map(|i| i.criticality).unwrap_or(0);
        let cb = model.cis().get(*b).map(|i| i.criticality).unwrap_or(0);
        cb.cmp(&ca).then(a.cmp(b))
    });

    let mut mixture_lists: Vec<Vec<Mixture>> = Vec::with_capacity(digit_cis.len());
    for ci in &digit_cis {
        let mixtures =
            crate::coverage::mixtures_of(&model.system, ci, grouping.head_coverage.width).ok()?;
        mixture_lists.push(mixtures);
    }
    let radices: Vec<usize> = mixture_lists.iter().map(|m| m.len()).collect();
    if radices.iter().product::<usize>() != cases.len() {
        return None;
    }

    // Index the cases by their digit tuple.
    let mut by_tuple: BTreeMap<Vec<usize>, &CaseDraft> = BTreeMap::new();
    for case in cases {
        let mut tuple = Vec::with_capacity(digit_cis.len());
        for (ci, mixtures) in digit_cis.iter().zip(&mixture_lists) {
            let mixture = case.config.assignment.get(*ci)?;
            let idx = mixtures.iter().position(|m| m == mixture)?;
            tuple.push(idx);
        }
        if by_tuple.insert(tuple, case).is_some() {
            return None; // duplicate tuple: not the full product
        }
    }

    let mut ordered = Vec::with_capacity(cases.len());
    for tuple in gray_sequence(&radices) {
        ordered.push((*by_tuple.get(&tuple)?).clone());
    }
    Some(ordered)
}

/// Scans a finished schedule for precedence violations. A violation is a
/// case where the following TSI is invoked before its leading TSI, or a
/// following-only case scheduled before some case invoking the leading TSI.
pub fn scan_precedence_violations(
    schedule: &[&CaseDraft],
    pairs: &[PrecedencePair],
) -> Vec<PrecedencePair> {
    let mut violations = Vec::new();
    for pair in pairs {
        let within = schedule.iter().any(|c| !case_orders_pair(c, pair));
        let last_leading = schedule.iter().rposition(|c| invokes(c, &pair.leading));
        let across = match last_leading {
            Some(last) => schedule
                .iter()
                .take(last)
                .any(|c| invokes(c, &pair.following) && !invokes(c, &pair.leading)),
            None => false,
        };
        if within || across {
            violations.push(pair.clone());
        }
    }
    violations
}
