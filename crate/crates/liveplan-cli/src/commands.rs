//! The four commands behind the CLI: generate, verify, metrics, explain.
//!
//! Exit codes: 0 success, 1 validation or processing failure (diagnostics on
//! stderr), 2 no safe test method exists for some CI. Artifacts go to files;
//! reports go to stdout.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use liveplan_core::coverage::TestConfiguration;
use liveplan_core::ids::{AppId, CiId};
use liveplan_core::methods::{Method, MethodError};
use liveplan_core::model::Model;
use liveplan_core::oracle;
use liveplan_core::ordering::scan_precedence_violations;
use liveplan_core::pipeline::{generate_with_trace, GenerateOptions, PipelineError};
use liveplan_core::plan::{plan_metrics, TestPlan};
use liveplan_core::runs::{mandated_configurations, CaseDraft};
use liveplan_core::validate::validate_inputs;

use crate::bundle::load_bundle;
use crate::planfile::{metrics_doc, parse_plan, serialize_metrics, serialize_plan};

/// Brute-force size limits for the verification claims.
#[derive(Clone, Copy, Debug)]
pub struct VerifyCaps {
    pub runs: usize,
    pub cases: usize,
}

impl Default for VerifyCaps {
    fn default() -> Self {
        Self {
            runs: oracle::DEFAULT_RUN_CAP,
            cases: oracle::DEFAULT_CASE_CAP,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Json,
}

fn load_model(input: &Path) -> Result<Model, i32> {
    let bundle = match load_bundle(input) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return Err(1);
        }
    };
    match validate_inputs(&bundle) {
        Ok(model) => Ok(model),
        Err(errors) => {
            for e in &errors {
                eprintln!("error: {e}");
            }
            eprintln!("error: {} validation error(s)", errors.len());
            Err(1)
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), i32> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            if let Err(e) = fs::create_dir_all(parent) {
                eprintln!("error: {}: {e}", parent.display());
                return Err(1);
            }
        }
    }
    if let Err(e) = fs::write(path, contents) {
        eprintln!("error: {}: {e}", path.display());
        return Err(1);
    }
    Ok(())
}

/// Runs the whole pipeline on a bundle and writes `plan.json` and
/// `metrics.json`.
pub fn cmd_generate(
    input: &Path,
    out: &Path,
    metrics_out: Option<&Path>,
    seed: Option<u64>,
) -> i32 {
    let model = match load_model(input) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let options = GenerateOptions { seed };
    let (plan, _trace) = match generate_with_trace(&model, &options) {
        Ok(result) => result,
        Err(PipelineError::Method(MethodError::NoSafeMethod(ci))) => {
            eprintln!("error: no safe test method exists for CI {ci}");
            return 2;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };

    if write_file(out, &serialize_plan(&plan)).is_err() {
        return 1;
    }

    let metrics_path = metrics_out
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| out.parent().unwrap_or(Path::new(".")).join("metrics.json"));
    let metrics = plan_metrics(&plan, &model);
    let report = oracle::simulate_execution(&plan, &model);
    let doc = metrics_doc(&metrics, &report, true);
    if write_file(&metrics_path, &serialize_metrics(&doc)).is_err() {
        return 1;
    }
    0
}

struct ClaimOutcome {
    name: &'static str,
    status: String,
    failed: bool,
}

fn claim(name: &'static str, status: String, failed: bool) -> ClaimOutcome {
    ClaimOutcome {
        name,
        status,
        failed,
    }
}

fn case_drafts(plan: &TestPlan) -> Vec<CaseDraft> {
    plan.schedule
        .iter()
        .map(|c| CaseDraft {
            grouping: c.grouping.clone(),
            config: c.configuration.clone(),
            invocations: c.main.clone(),
        })
        .collect()
}

/// Checks the five verification claims against a plan and its input bundle:
/// coverage completeness, merging minimality, precedence soundness, ordering
/// optimality (at the brute-force caps), and the disturbance simulation.
pub fn cmd_verify(input: &Path, plan_path: &Path, caps: VerifyCaps) -> i32 {
    let model = match load_model(input) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let text = match fs::read_to_string(plan_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", plan_path.display());
            return 1;
        }
    };
    let plan = match parse_plan(&text) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {}: {e}", plan_path.display());
            return 1;
        }
    };

    let mandated = match mandated_configurations(&model) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };

    let outcomes = vec![
        check_completeness(&model, &plan, &mandated),
        check_minimality(&plan, &mandated, caps),
        check_precedence(&model, &plan),
        check_ordering(&plan, caps),
        check_simulation(&model, &plan),
    ];

    let mut failed = false;
    for outcome in &outcomes {
        println!("{}: {}", outcome.name, outcome.status);
        failed |= outcome.failed;
    }
    if failed {
        1
    } else {
        0
    }
}

fn check_completeness(
    model: &Model,
    plan: &TestPlan,
    mandated: &BTreeMap<AppId, Vec<TestConfiguration>>,
) -> ClaimOutcome {
    let mut problems: Vec<String> = Vec::new();
    for (app_id, configs) in mandated {
        let Some(app) = model.application(app_id) else {
            continue;
        };
        for config in configs {
            let hosting: usize = plan
                .schedule
                .iter()
                .map(|case| {
                    let matches = case
                        .configuration
                        .restrict_to(app.path.vertices())
                        .map(|r| r == config.assignment)
                        .unwrap_or(false);
                    if matches {
                        case.main.iter().filter(|a| *a == app_id).count()
                    } else {
                        0
                    }
                })
                .sum();
            match hosting {
                1 => {}
                0 => problems.push(format!("missing run: {app_id} under {config}")),
                _ => problems.push(format!("duplicate run: {app_id} under {config}")),
            }
        }
    }
    // Invocations that match no mandated configuration are duplicates in
    // disguise.
    for case in &plan.schedule {
        for app_id in &case.main {
            let Some(app) = model.application(app_id) else {
                problems.push(format!("unknown application {app_id} invoked"));
                continue;
            };
            let restriction = case.configuration.restrict_to(app.path.vertices());
            let legitimate = restriction
                .as_ref()
                .map(|r| {
                    mandated
                        .get(app_id)
                        .map(|configs| configs.iter().any(|c| &c.assignment == r))
                        .unwrap_or(false)
                })
                .unwrap_or(false);
            if !legitimate {
                problems.push(format!(
                    "unexpected run: {app_id} in case {}",
                    case.id
                ));
            }
        }
    }
    if problems.is_empty() {
        claim("coverage-completeness", "PASS".into(), false)
    } else {
        claim(
            "coverage-completeness",
            format!("FAIL ({})", problems.join("; ")),
            true,
        )
    }
}

fn check_minimality(
    plan: &TestPlan,
    mandated: &BTreeMap<AppId, Vec<TestConfiguration>>,
    caps: VerifyCaps,
) -> ClaimOutcome {
    let runs: Vec<liveplan_core::runs::Run> = mandated
        .iter()
        .flat_map(|(app, configs)| {
            configs.iter().map(move |c| liveplan_core::runs::Run {
                app: app.clone(),
                assignment: c.assignment.clone(),
            })
        })
        .collect();
    match oracle::minimal_config_count(&runs, caps.runs) {
        Err(e) => claim("merging-minimality", format!("SKIPPED ({e})"), false),
        Ok(minimum) => {
            let deployed: BTreeSet<_> = plan
                .schedule
                .iter()
                .map(|c| c.configuration.assignment.clone())
                .collect();
            if deployed.len() == minimum {
                claim("merging-minimality", "PASS".into(), false)
            } else {
                claim(
                    "merging-minimality",
                    format!(
                        "FAIL (deployed {} configurations, minimum is {minimum})",
                        deployed.len()
                    ),
                    true,
                )
            }
        }
    }
}

fn check_precedence(model: &Model, plan: &TestPlan) -> ClaimOutcome {
    let drafts = case_drafts(plan);
    let refs: Vec<&CaseDraft> = drafts.iter().collect();
    let violations = scan_precedence_violations(&refs, &model.precedence);
    if violations.is_empty() {
        claim("precedence", "PASS".into(), false)
    } else {
        let detail: Vec<String> = violations
            .iter()
            .map(|p| format!("({}, {})", p.leading, p.following))
            .collect();
        claim(
            "precedence",
            format!("FAIL (violated pairs: {})", detail.join(", ")),
            true,
        )
    }
}

fn check_ordering(plan: &TestPlan, caps: VerifyCaps) -> ClaimOutcome {
    let mut skipped = 0usize;
    let mut failures: Vec<String> = Vec::new();
    for meta in &plan.metadata.groupings {
        let assignments: Vec<_> = plan
            .cases_of(&meta.head)
            .map(|c| c.configuration.assignment.clone())
            .collect();
        if assignments.len() > caps.cases {
            skipped += 1;
            continue;
        }
        let rolling: BTreeSet<CiId> = meta
            .methods
            .iter()
            .filter(|(_, m)| **m == Method::RollingPaths)
            .map(|(ci, _)| ci.clone())
            .collect();
        let score = oracle::transition_score(&assignments, &rolling);
        match oracle::brute_force_best_ordering(&assignments, &rolling, caps.cases) {
            Ok((minimum, _)) if score == minimum => {}
            Ok((minimum, _)) => failures.push(format!(
                "grouping {}: scheduled {} relocations, minimum is {minimum}",
                meta.head, score
            )),
            Err(_) => skipped += 1,
        }
    }
    if !failures.is_empty() {
        claim(
            "ordering-optimality",
            format!("FAIL ({})", failures.join("; ")),
            true,
        )
    } else if skipped > 0 {
        claim(
            "ordering-optimality",
            format!("SKIPPED ({skipped} grouping(s) above the case cap)"),
            false,
        )
    } else {
        claim("ordering-optimality", "PASS".into(), false)
    }
}

fn check_simulation(model: &Model, plan: &TestPlan) -> ClaimOutcome {
    let report = oracle::simulate_execution(plan, model);
    if report.violations.is_empty() {
        claim("simulation", "PASS".into(), false)
    } else {
        let detail: Vec<String> = report
            .violations
            .iter()
            .map(|v| {
                format!(
                    "{} accumulated {:.3}s against a {:.3}s budget",
                    v.service_instance,
                    v.accumulated.as_secs_f64(),
                    v.budget.as_secs_f64()
                )
            })
            .collect();
        claim("simulation", format!("FAIL ({})", detail.join("; ")), true)
    }
}

/// Prints the cost summary of a plan. With an input bundle the summary
/// includes the wall-clock estimate and outage simulation; without one it
/// sticks to what the plan alone can tell.
pub fn cmd_metrics(plan_path: &Path, input: Option<&Path>, format: OutputFormat) -> i32 {
    let text = match fs::read_to_string(plan_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", plan_path.display());
            return 1;
        }
    };
    let plan = match parse_plan(&text) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {}: {e}", plan_path.display());
            return 1;
        }
    };
    let (model, with_wall) = match input {
        Some(dir) => match load_model(dir) {
            Ok(m) => (m, true),
            Err(code) => return code,
        },
        None => (Model::default(), false),
    };
    let metrics = plan_metrics(&plan, &model);
    let report = oracle::simulate_execution(&plan, &model);
    let doc = metrics_doc(&metrics, &report, with_wall);

    match format {
        OutputFormat::Json => print!("{}", serialize_metrics(&doc)),
        OutputFormat::Text => {
            println!(
                "{:<10} {:>12} {:>15} {:>9}",
                "CI", "relocations", "instantiations", "removals"
            );
            for (ci, row) in &doc.per_ci {
                println!(
                    "{:<10} {:>12} {:>15} {:>9}",
                    ci, row.relocations, row.instantiations, row.removals
                );
            }
            println!();
            println!("cases:                    {}", doc.cases);
            println!("fragments:                {}", doc.fragments);
            println!("deployed configurations:  {}", doc.deployed_configurations);
            if let Some(wall) = doc.estimated_wall_seconds {
                println!("estimated wall time:      {wall:.3}s");
            }
            if !doc.budget_violations.is_empty() {
                println!("budget violations:");
                for v in &doc.budget_violations {
                    println!(
                        "  {}: {:.3}s accumulated vs {:.3}s budget",
                        v.service_instance, v.accumulated_seconds, v.budget_seconds
                    );
                }
            }
        }
    }
    0
}

/// Prints the groupings, method choices, and costs recorded in a plan.
pub fn cmd_explain(plan_path: &Path) -> i32 {
    let text = match fs::read_to_string(plan_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", plan_path.display());
            return 1;
        }
    };
    let plan = match parse_plan(&text) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {}: {e}", plan_path.display());
            return 1;
        }
    };
    println!("objective: {}", plan.objective);
    println!(
        "schedule: {} case(s), {} distinct configuration(s)",
        plan.schedule.len(),
        plan.metadata.deployed_configurations
    );
    for meta in &plan.metadata.groupings {
        let path: Vec<String> = meta.max_path.iter().map(|c| c.to_string()).collect();
        let members: Vec<String> = meta.members.iter().map(|m| m.to_string()).collect();
        println!();
        println!(
            "grouping {}{}",
            meta.head,
            if meta.residual { " (residual)" } else { "" }
        );
        println!("  max path: {}", path.join(" -> "));
        println!("  members:  {}", members.join(", "));
        println!(
            "  cases: {}  parallel capacity: {}",
            meta.case_count, meta.parallel_capacity
        );
        for (ci, method) in &meta.methods {
            let cost = meta.costs.get(ci);
            match cost {
                Some(c) => println!(
                    "  {ci}: {method} (iterations {}, instantiations {}, removals {}, relocations {})",
                    c.iteration_count, c.instantiations, c.removals, c.relocations
                ),
                None => println!("  {ci}: {method}"),
            }
        }
    }
    if !plan.metadata.method_downgrades.is_empty() {
        println!();
        println!("method downgrades (small flip -> rolling paths):");
        for (grouping, ci) in &plan.metadata.method_downgrades {
            println!("  {ci} in grouping {grouping}");
        }
    }
    if !plan.metadata.framework_choices.is_empty() {
        println!();
        println!("framework deployments:");
        for (tsi, choice) in &plan.metadata.framework_choices {
            println!(
                "  {tsi}: {} via {} ({:.3}s)",
                choice.framework,
                choice.option.name(),
                choice.deploy_time.as_secs_f64()
            );
        }
    }
    0
}
