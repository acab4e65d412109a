//! End-to-end plan generation: coverage, merging, method selection,
//! ordering, assembly, wrapup.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::coverage::{CoverageError, TestConfiguration};
use crate::ids::AppId;
use crate::merging::{merge_call_paths, Grouping};
use crate::methods::{select_methods, MethodAssignment, MethodError};
use crate::model::Model;
use crate::ordering::{
    enforce_precedence, order_by_configuration, OrderedPlanDraft, OrderingError,
};
use crate::plan::{apply_method_pattern, build_initial_plan, wrapup, PlanError, TestPlan};
use crate::runs::{mandated_configurations, required_runs, CaseLayout};

#[derive(Clone, Debug, Default)]
pub struct GenerateOptions {
    /// Randomizes the greedy ordering's start case; `None` is the
    /// deterministic canonical start.
    pub seed: Option<u64>,
}

/// Intermediate pipeline artifacts, kept around for verification and
/// explanation.
#[derive(Clone, Debug)]
pub struct PipelineTrace {
    pub mandated: BTreeMap<AppId, Vec<TestConfiguration>>,
    pub groupings: Vec<Grouping>,
    pub layout: CaseLayout,
    pub assignment: MethodAssignment,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PipelineError {
    Coverage(CoverageError),
    Method(MethodError),
    Ordering(OrderingError),
    Plan(PlanError),
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PipelineError::Coverage(e) => write!(f, "{e}"),
            PipelineError::Method(e) => write!(f, "{e}"),
            PipelineError::Ordering(e) => write!(f, "{e}"),
            PipelineError::Plan(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for PipelineError {}

impl From<CoverageError> for PipelineError {
    fn from(e: CoverageError) -> Self {
        PipelineError::Coverage(e)
    }
}
impl From<MethodError> for PipelineError {
    fn from(e: MethodError) -> Self {
        PipelineError::Method(e)
    }
}
impl From<OrderingError> for PipelineError {
    fn from(e: OrderingError) -> Self {
        PipelineError::Ordering(e)
    }
}
impl From<PlanError> for PipelineError {
    fn from(e: PlanError) -> Self {
        PipelineError::Plan(e)
    }
}

/// Runs the full pipeline on a validated model.
pub fn generate_plan(model: &Model, options: &GenerateOptions) -> Result<TestPlan, PipelineError> {
    generate_with_trace(model, options).map(|(plan, _)| plan)
}

/// Runs the full pipeline and returns the intermediate artifacts along with
/// the plan.
pub fn generate_with_trace(
    model: &Model,
    options: &GenerateOptions,
) -> Result<(TestPlan, PipelineTrace), PipelineError> {
    let mandated = mandated_configurations(model)?;
    let groupings = merge_call_paths(&model.applications);
    let layout = required_runs(&groupings, &mandated, model);
    let mut assignment = select_methods(&layout, model)?;

    let mut draft = OrderedPlanDraft::from_layout(&layout);
    let downgrades = enforce_precedence(
        &mut draft,
        &model.precedence,
        model,
        &layout,
        &mut assignment,
    )?;
    order_by_configuration(&mut draft, model, &layout, &assignment, options.seed);

    let mut plan = build_initial_plan(&draft, &layout, &assignment, model);
    apply_method_pattern(&mut plan)?;
    wrapup(&mut plan, &model.objective, model)?;
    plan.metadata.method_downgrades = downgrades
        .into_iter()
        .map(|d| (d.grouping, d.ci))
        .collect::<Vec<_>>();

    let trace = PipelineTrace {
        mandated,
        groupings: layout.groupings.clone(),
        layout,
        assignment,
    };
    Ok((plan, trace))
}
